"""Shared test plumbing: finite-difference helpers and the acceptance
summary printed at the end of the run."""

import numpy as np

ACCEPTANCE_RESULTS = []


def record_acceptance(num: int, ok: bool, detail: str) -> bool:
    """Collect one acceptance-criterion verdict; printed in the terminal
    summary so the pass/fail lines survive output capture."""
    line = f"ACCEPTANCE {num} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_RESULTS.append((num, line))
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_RESULTS):
            terminalreporter.write_line(line)


def rel_err(a: float, b: float, floor: float = 1e-6) -> float:
    return abs(a - b) / max(abs(a), abs(b), floor)


def central_diff(f, arr: np.ndarray, index, step: float = 1e-5) -> float:
    """d f / d arr[index] by central differences, restoring arr."""
    orig = arr[index]
    try:
        arr[index] = orig + step
        fp = f()
        arr[index] = orig - step
        fm = f()
    finally:
        arr[index] = orig
    return (fp - fm) / (2.0 * step)


def max_fd_error(f, arrs_and_grads, rng, n_coords: int = 20,
                 step: float = 1e-5) -> float:
    """Worst relative error between analytic gradients and central
    differences over randomly sampled coordinates.

    ``f`` recomputes the scalar loss from current array contents;
    ``arrs_and_grads`` is a list of (array, analytic_gradient) pairs.
    """
    worst = 0.0
    for arr, grad in arrs_and_grads:
        for _ in range(n_coords):
            idx = tuple(rng.integers(0, s) for s in arr.shape)
            fd = central_diff(f, arr, idx, step)
            worst = max(worst, rel_err(grad[idx], fd))
    return worst
