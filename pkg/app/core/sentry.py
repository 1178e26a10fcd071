import sentry_sdk
from app.core.config import config


def init_sentry() -> bool:
    """Initialise error reporting when a DSN is configured."""
    if not config.SENTRY_DSN:
        return False
    sentry_sdk.init(
        dsn=config.SENTRY_DSN,
        environment=config.ENVIRONMENT,
        traces_sample_rate=config.SENTRY_TRACES_SAMPLE_RATE,
    )
    return True
