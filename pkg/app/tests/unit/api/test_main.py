from app import main
from app.core.config import config


def test_serve_uses_configured_address(monkeypatch):
    calls = []
    monkeypatch.setattr(main.uvicorn, "run", lambda target, **kwargs: calls.append((target, kwargs)))
    monkeypatch.setattr(config, "PORT", 8123)
    monkeypatch.setattr(config, "LOG_LEVEL", "DEBUG")
    main.serve()
    assert calls == [
        (
            "app.main:app",
            {"host": config.HOST, "port": 8123, "reload": config.RELOAD, "log_level": "debug"},
        )
    ]
