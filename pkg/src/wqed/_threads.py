"""BLAS thread-pool control for the matrix-free hot loops.

The kernels in this package are many small (N x N, N ~ 100) products; with
multi-threaded BLAS those thrash and run several times slower than single
threaded.  Hot loops pin BLAS to one thread and leave parallelism to the
scenario worker pool; large dense eigenproblems keep the default pool.
"""

from __future__ import annotations

from contextlib import contextmanager

try:
    from threadpoolctl import threadpool_limits

    @contextmanager
    def single_thread_blas():
        with threadpool_limits(limits=1, user_api="blas"):
            yield

except ImportError:  # pragma: no cover - threadpoolctl is a hard dependency

    @contextmanager
    def single_thread_blas():
        yield
