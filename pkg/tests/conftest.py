import pytest

from rejuvsim import bti, netlist, timing


@pytest.fixture(scope="session")
def model():
    return bti.default_model()


@pytest.fixture(scope="session")
def gdm():
    return timing.default_gate_model()


@pytest.fixture(scope="session")
def nand_nor():
    return netlist.build_decoder("NAND_NOR", 9, (3, 3, 3),
                                 timing_budget=2.0, setup_time=0.2)


@pytest.fixture(scope="session")
def and_and():
    return netlist.build_decoder("AND_AND", 9, (3, 3, 3),
                                 timing_budget=2.4, setup_time=0.2)


@pytest.fixture(scope="session")
def tiny():
    return netlist.build_decoder("NAND_NOR", 2, (2,),
                                 timing_budget=3.0, setup_time=0.2)
