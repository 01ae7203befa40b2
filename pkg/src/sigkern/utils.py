"""Resource accounting and deterministic work scheduling."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

__all__ = ["ResourceCounters", "run_tasks"]


class ResourceCounters:
    """Accumulates multiply-add counts and a peak-live-bytes estimate.

    `flops` counts the scalar multiply-adds of the inner numerical loops
    (a matmul contributes n*m*k, an elementwise product its element count).
    `peak_bytes` is an analytic high-water mark: compute stages report the
    byte footprint of their dominant live buffers via `observe_bytes` and the
    maximum is kept. Neither is an OS measurement; both are deterministic.
    """

    __slots__ = ("flops", "peak_bytes")

    def __init__(self):
        self.flops = 0
        self.peak_bytes = 0

    def add_flops(self, n) -> None:
        self.flops += int(n)

    def observe_bytes(self, n) -> None:
        n = int(n)
        if n > self.peak_bytes:
            self.peak_bytes = n

    def merge(self, other: "ResourceCounters") -> None:
        self.flops += other.flops
        if other.peak_bytes > self.peak_bytes:
            self.peak_bytes = other.peak_bytes

    def __repr__(self) -> str:
        return f"ResourceCounters(flops={self.flops}, peak_bytes={self.peak_bytes})"


def run_tasks(fn, tasks, n_threads: int = 1) -> None:
    """Run fn(task) for every task, optionally on a thread pool.

    The task list and everything fn computes must not depend on n_threads;
    workers write to disjoint slices of preallocated outputs. That makes
    results byte-identical for any thread count, which the CLI relies on.
    """
    tasks = list(tasks)
    if n_threads <= 1 or len(tasks) <= 1:
        for task in tasks:
            fn(task)
        return
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        # list() propagates the first worker exception
        list(pool.map(fn, tasks))
