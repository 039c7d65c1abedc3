"""
Monte Carlo support recovery on the synthetic four-component model.

Every (p, n, trial) gets its own seed spawned from one root SeedSequence in a
fixed order, so the table is independent of thread scheduling.
"""

import io
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from shared.config import config
from shared.exceptions import SpamError
from shared.models import CovariateLaw, FitConfig, RecoveryRow, SmootherKind, SmootherSpec, SyntheticSpec
from datasets import TRUE_SUPPORT, generate_synthetic
from selection import compute_path, select_model


logger = logging.getLogger(__name__)

RECOVERY_COLUMNS = ['p', 'n', 'trials', 'proportion']


class ProgressTracker:
    """Thread-safe progress tracking"""

    def __init__(self, total_items: int, callback: Optional[Callable[[str], None]] = None):
        self.total_items = total_items
        self.completed_items = 0
        self.callback = callback or logger.info
        self.lock = threading.Lock()
        self.start_time = time.time()

    def update(self, message: str = ""):
        with self.lock:
            self.completed_items += 1
            elapsed = time.time() - self.start_time
            rate = self.completed_items / elapsed if elapsed > 0 else 0
            eta = (self.total_items - self.completed_items) / rate if rate > 0 else 0
            status = (
                f"Progress: {self.completed_items}/{self.total_items} "
                f"({100.0 * self.completed_items / max(self.total_items, 1):.1f}%) - ETA: {eta:.0f}s"
            )
            if message:
                status = f"{status} | {message}"
            self.callback(status)


class TrialOutcome(BaseModel):
    p: int
    n: int
    trial: int
    recovered: bool = False
    support: List[int] = Field(default_factory=list)
    error: Optional[str] = None

    @property
    def failed(self) -> bool:
        return self.error is not None


def _trial_seed(seq: np.random.SeedSequence) -> int:
    return int(seq.generate_state(1, dtype=np.uint64)[0])


def default_covariate_law() -> CovariateLaw:
    return CovariateLaw(config.benchmark.get('covariate_law', CovariateLaw.UNIFORM_WIDE.value))


def run_trial(
    p: int,
    n: int,
    seed: int,
    noise_sd: Optional[float] = None,
    truncation: Optional[int] = None,
    criterion: str = "cp",
    trial: int = 0,
    covariate_law: Optional[CovariateLaw] = None
) -> TrialOutcome:
    """Generate one synthetic dataset, fit its path and check exact support recovery."""
    noise_sd = noise_sd or float(config.benchmark.get('noise_sd', 1.0))
    truncation = truncation or int(config.benchmark.get('truncation', 3))
    covariate_law = covariate_law or default_covariate_law()
    try:
        synthetic = generate_synthetic(
            SyntheticSpec(n=n, p=p, noise_sd=noise_sd, seed=seed, covariate_law=covariate_law)
        )
        cfg = FitConfig(
            lambda_=0.0,
            smoother=SmootherSpec(kind=SmootherKind.ORTHOGONAL_SERIES, truncation=truncation),
        )
        path = compute_path(synthetic.dataset, cfg)
        _, model = select_model(path, criterion)
    except (SpamError, ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
        logger.warning(f"trial p={p} n={n} #{trial} failed: {e}")
        return TrialOutcome(p=p, n=n, trial=trial, error=str(e))

    support = model.support
    return TrialOutcome(
        p=p, n=n, trial=trial, support=support, recovered=support == list(TRUE_SUPPORT)
    )


def run_benchmark(
    p_list: Sequence[int],
    n_grid: Sequence[int],
    trials: Optional[int] = None,
    seed: int = 0,
    workers: Optional[int] = None,
    noise_sd: Optional[float] = None,
    truncation: Optional[int] = None,
    criterion: str = "cp",
    covariate_law: Optional[CovariateLaw] = None
) -> List[RecoveryRow]:
    trials = trials or int(config.benchmark.get('trials', 20))
    workers = workers or int(config.benchmark.get('workers', 4))
    covariate_law = covariate_law or default_covariate_law()

    cells = [(p, n) for p in p_list for n in n_grid]
    seeds = np.random.SeedSequence(seed).spawn(len(cells) * trials)
    jobs = [
        (p, n, t, _trial_seed(seeds[k * trials + t]))
        for k, (p, n) in enumerate(cells)
        for t in range(trials)
    ]

    progress = ProgressTracker(len(jobs))
    outcomes: List[TrialOutcome] = []
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_job = {
            executor.submit(run_trial, p, n, s, noise_sd, truncation, criterion, t, covariate_law): (p, n, t)
            for p, n, t, s in jobs
        }
        for future in as_completed(future_to_job):
            p, n, t = future_to_job[future]
            try:
                outcome = future.result()
            except Exception as e:
                outcome = TrialOutcome(p=p, n=n, trial=t, error=str(e))
            outcomes.append(outcome)
            progress.update(f"p={p} n={n} trial={t} recovered={outcome.recovered}")

    outcomes.sort(key=lambda o: (o.p, o.n, o.trial))
    rows = []
    for p, n in cells:
        cell = [o for o in outcomes if o.p == p and o.n == n]
        failures = sum(o.failed for o in cell)
        if failures:
            logger.warning(f"p={p} n={n}: {failures} of {trials} trials failed")
        rows.append(RecoveryRow(
            p=p,
            n=n,
            trials=trials,
            proportion=sum(o.recovered for o in cell) / trials,
            failures=failures,
        ))
    return rows


def recovery_table(rows: Sequence[RecoveryRow]) -> pd.DataFrame:
    return pd.DataFrame([row.model_dump(include=set(RECOVERY_COLUMNS)) for row in rows], columns=RECOVERY_COLUMNS)


def export_recovery_csv(
    rows: Sequence[RecoveryRow],
    dest: Optional[Union[str, Path, io.TextIOBase]] = None
) -> Optional[str]:
    return recovery_table(rows).to_csv(dest, index=False, lineterminator='\n')
