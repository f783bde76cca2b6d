import pytest

from nehari1d import (
    ConstantQ,
    ProblemSpec,
    gaussian_init,
    make_grid,
    minimize_on_nehari,
    shoot,
    sweep,
)

BENCH_RADIUS = 20.0
BENCH_M = 2001  # h = 0.02


@pytest.fixture(scope="session")
def benchmark_spec():
    return ProblemSpec(n_components=1, p=3.0, lambdas=(1.0,), q_profile=ConstantQ(1.0))


@pytest.fixture(scope="session")
def benchmark_grid():
    return make_grid(BENCH_RADIUS, BENCH_M)


@pytest.fixture(scope="session")
def benchmark_result(benchmark_spec, benchmark_grid):
    """Constant-coefficient scalar ground state; exact answer sqrt(2) sech(t)."""
    init = gaussian_init(benchmark_spec, benchmark_grid)
    return minimize_on_nehari(benchmark_spec, benchmark_grid, init)


@pytest.fixture(scope="session")
def coupled_spec():
    return ProblemSpec(n_components=2, p=3.0, lambdas=(1.0, 1.0), q_profile=ConstantQ(1.0))


@pytest.fixture(scope="session")
def coupled_result(coupled_spec, benchmark_grid):
    """Two equal components; exact answer (sech, sech)."""
    init = gaussian_init(coupled_spec, benchmark_grid)
    return minimize_on_nehari(coupled_spec, benchmark_grid, init)


@pytest.fixture(scope="session")
def sweep_lambda1(benchmark_spec):
    return sweep(benchmark_spec, (5.0, 10.0, 20.0, 40.0), 0.02)


@pytest.fixture(scope="session")
def sweep_lambda4():
    spec = ProblemSpec(n_components=1, p=3.0, lambdas=(4.0,), q_profile=ConstantQ(1.0))
    return sweep(spec, (5.0, 10.0, 20.0, 40.0), 0.02)


@pytest.fixture(scope="session")
def standard_shoot():
    """f'' = -f^3 from (1, 0); exits at the lemniscatic time 1.85407..."""
    return shoot(q0=1.0, p=3.0, f0=1.0, s0=0.0, t_max=50.0, dt=1e-3)
