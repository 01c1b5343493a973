import mpmath as mp
import pytest

from paddrop.lattice import LatticeKind, make_lattice

#: Lines printed by the acceptance suite, shown in the terminal summary.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def theta_sigma(spec, z, dps=30):
    """Weierstrass sigma via Jacobi theta functions (independent of the product sum)."""
    with mp.workdps(dps):
        w1 = mp.mpc(spec.w1)
        tau = mp.mpc(spec.w3) / w1
        nome = mp.exp(1j * mp.pi * tau)
        v = mp.pi * mp.mpc(z) / (2 * w1)
        return (2 * w1 / mp.pi) * mp.exp(mp.mpc(spec.eta1) * mp.mpc(z) ** 2 / (2 * w1)) \
            * mp.jtheta(1, v, nome) / mp.jtheta(1, 0, nome, 1)


@pytest.fixture(scope="session")
def square():
    return make_lattice(LatticeKind.SQUARE)


@pytest.fixture(scope="session")
def triangular():
    return make_lattice(LatticeKind.TRIANGULAR)
