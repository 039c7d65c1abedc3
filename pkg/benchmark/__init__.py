from .recovery import (
    ProgressTracker,
    TrialOutcome,
    export_recovery_csv,
    recovery_table,
    run_benchmark,
    run_trial,
)

__all__ = [
    'ProgressTracker',
    'TrialOutcome',
    'export_recovery_csv',
    'recovery_table',
    'run_benchmark',
    'run_trial',
]
