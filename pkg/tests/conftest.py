from importlib import resources

import pytest

import flowgames as fg


def bundled_text(name: str) -> str:
    return resources.files("flowgames").joinpath(f"examples/{name}").read_text()


@pytest.fixture(scope="session")
def elfarol():
    return fg.parse_game_file(bundled_text("elfarol.game"))


@pytest.fixture(scope="session")
def pigou_info():
    return fg.parse_game_file(bundled_text("pigou_info.game"))


@pytest.fixture(scope="session")
def pigou_network():
    return fg.parse_game_file(bundled_text("pigou_network.game"))


@pytest.fixture(scope="session")
def pigou_bcwe(pigou_info):
    return fg.parse_outcome_file(bundled_text("pigou_bcwe.outcome"), pigou_info)


@pytest.fixture(scope="session")
def elfarol_cwe(elfarol):
    return fg.parse_outcome_file(bundled_text("elfarol_cwe.outcome"), elfarol)
