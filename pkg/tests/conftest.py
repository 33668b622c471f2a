import pytest

from wglab.sieve import build_context, build_f_b, build_v_b, selberg_weights


def context_for_target_N(target, *, k=2, s=4, theta=0.75, delta=0.3, W=24, tol=0.01):
    """Search the anchor M so the construction lands within tol of target N."""
    exponent = 1 - 1 / k + theta / k
    M = int(s * (W * target / 2.5) ** (1 / exponent))
    ctx = None
    for _ in range(60):
        ctx = build_context(k, s, theta, M, delta=delta, W_override=W)
        if abs(ctx.N - target) / target < tol:
            return ctx
        M = max(int(M * (target / ctx.N) ** (1 / exponent)), s + 1)
    return ctx


@pytest.fixture(scope="session")
def small_ctx():
    # N near 1e4; fast enough for per-test table rebuilds
    return context_for_target_N(10_000)


@pytest.fixture(scope="session")
def small_weights(small_ctx):
    return selberg_weights(small_ctx.z, small_ctx.W, small_ctx)


@pytest.fixture(scope="session")
def small_tables(small_ctx, small_weights):
    return build_f_b(small_ctx, small_weights), build_v_b(small_ctx, small_weights)
