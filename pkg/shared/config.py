import os
import yaml
from pathlib import Path
from typing import Dict, Any, Optional
from dotenv import load_dotenv

load_dotenv()


PROJECT_ROOT = Path(__file__).resolve().parent.parent


class Config:
    def __init__(self, config_path: Optional[str] = None):
        self.config_path = self._resolve_path(config_path)
        self._config = self._load_config()

    @staticmethod
    def _resolve_path(config_path: Optional[str]) -> Path:
        if config_path is not None:
            return Path(config_path)

        env_path = os.getenv('SPAM_CONFIG')
        if env_path:
            return Path(env_path)

        local = Path("config.yaml")
        if local.exists():
            return local
        return PROJECT_ROOT / "config.yaml"

    def _load_config(self) -> Dict[str, Any]:
        if not self.config_path.exists():
            raise FileNotFoundError(f"Config file not found: {self.config_path}")

        with open(self.config_path, 'r', encoding='utf-8') as f:
            return yaml.safe_load(f) or {}

    def reload(self):
        self._config = self._load_config()

    def get(self, key: str, default: Any = None) -> Any:
        keys = key.split('.')
        value = self._config
        for k in keys:
            if isinstance(value, dict) and k in value:
                value = value[k]
            else:
                return default
        return value

    @property
    def smoother(self) -> Dict[str, Any]:
        return self.get('smoother', {})

    @property
    def backfit(self) -> Dict[str, Any]:
        return self.get('backfit', {})

    @property
    def logistic(self) -> Dict[str, Any]:
        return self.get('logistic', {})

    @property
    def lasso(self) -> Dict[str, Any]:
        return self.get('lasso', {})

    @property
    def path(self) -> Dict[str, Any]:
        return self.get('path', {})

    @property
    def benchmark(self) -> Dict[str, Any]:
        return self.get('benchmark', {})

    @property
    def logging(self) -> Dict[str, Any]:
        return self.get('logging', {})


class EnvConfig:
    SPAM_SEED = os.getenv('SPAM_SEED')
    SPAM_CONFIG = os.getenv('SPAM_CONFIG')
    SPAM_LOG_LEVEL = os.getenv('SPAM_LOG_LEVEL')

    LANGFUSE_PUBLIC_KEY = os.getenv('LANGFUSE_PUBLIC_KEY')
    LANGFUSE_SECRET_KEY = os.getenv('LANGFUSE_SECRET_KEY')
    LANGFUSE_HOST = os.getenv('LANGFUSE_HOST', 'https://cloud.langfuse.com')

    DEBUG = os.getenv('DEBUG', 'false').lower() == 'true'

    @property
    def seed(self) -> Optional[int]:
        raw = os.getenv('SPAM_SEED', self.SPAM_SEED)
        if raw is None or raw == "":
            return None
        return int(raw)


config = Config()
env_config = EnvConfig()
