from concurrent.futures import ProcessPoolExecutor


def _call(job):
    func, args, trials = job
    return [func(*args, t) for t in trials]


def run_trials(func, args, n_trials: int, workers: int = 1) -> list:
    """Evaluate ``func(*args, trial)`` for every trial index, in trial order.

    Trials are dealt round-robin to ``workers`` processes; the output order
    (and, with per-trial seeding, every value) is independent of ``workers``.
    """
    ids = list(range(n_trials))
    if workers <= 1 or n_trials <= 1:
        return _call((func, args, ids))
    chunks = [ids[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(workers) as pool:
        parts = list(pool.map(_call, [(func, args, c) for c in chunks]))
    out = [None] * n_trials
    for chunk, part in zip(chunks, parts):
        for t, r in zip(chunk, part):
            out[t] = r
    return out
