import logging
import sys
from datetime import datetime
from typing import Dict, Any, Optional

from langfuse import Langfuse

from shared.config import config, env_config


logger = logging.getLogger(__name__)


def configure_logging(level: Optional[str] = None):
    """Route diagnostics to stderr; stdout is reserved for CLI payloads."""
    level = level or env_config.SPAM_LOG_LEVEL or config.logging.get('level', 'INFO')
    if env_config.DEBUG:
        level = 'DEBUG'
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, str(level).upper(), logging.INFO),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        force=True,
    )


class ObservabilityService:
    def __init__(self):
        self.langfuse_client = None
        self._initialize_langfuse()

    def _initialize_langfuse(self):
        if all([env_config.LANGFUSE_PUBLIC_KEY, env_config.LANGFUSE_SECRET_KEY]):
            try:
                self.langfuse_client = Langfuse(
                    public_key=env_config.LANGFUSE_PUBLIC_KEY,
                    secret_key=env_config.LANGFUSE_SECRET_KEY,
                    host=env_config.LANGFUSE_HOST
                )
                logger.info("Langfuse tracing initialized")
            except Exception as e:
                logger.warning(f"Failed to initialize Langfuse: {e}")
        else:
            logger.debug("Langfuse credentials not provided, tracing disabled")

    def trace_fit(
        self,
        kind: str,
        lambda_: float,
        n_iters: int,
        converged: bool,
        active: list,
        metadata: Dict[str, Any] = None
    ):
        logger.debug(
            f"{kind} fit lambda={lambda_:.6g} iters={n_iters} converged={converged} "
            f"active={len(active)}"
        )
        if not self.langfuse_client:
            return None

        return self.langfuse_client.trace(
            name=f"{kind}_fit",
            metadata={
                "lambda": lambda_,
                "n_iters": n_iters,
                "converged": converged,
                "active": list(active),
                "timestamp": datetime.utcnow().isoformat(),
                **(metadata or {})
            }
        )

    def log_error(self, error: Exception, context: Dict[str, Any] = None):
        if self.langfuse_client:
            try:
                self.langfuse_client.trace(
                    name="error",
                    metadata={"error": str(error), **(context or {})}
                )
            except Exception as e:
                logger.error(f"Failed to log error to Langfuse: {e}")

        logger.error(f"Error: {error}", extra={"context": context or {}})

    def flush(self):
        if self.langfuse_client:
            self.langfuse_client.flush()


# Global observability instance
observability = ObservabilityService()


class TraceContext:
    """Wraps one CLI command; marks the trace as failed when the body raises."""

    def __init__(self, name: str, metadata: Dict[str, Any] = None):
        self.name = name
        self.metadata = metadata or {}
        self.trace = None

    def __enter__(self):
        if observability.langfuse_client:
            self.trace = observability.langfuse_client.trace(
                name=self.name,
                metadata=self.metadata
            )
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        if self.trace and exc_type:
            self.trace.update(
                level="ERROR",
                status_message=str(exc_val)
            )
        observability.flush()
        return False
