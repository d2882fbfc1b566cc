import logging

from ltg_equiv import utils


def test_load_env_file_parses_quotes_and_comments(tmp_path):
    env = tmp_path / ".env"
    env.write_text("# comment\nLTG_WORKERS=4\nLTG_LOG_LEVEL='debug'\n\nnot a pair\n")
    assert utils.load_env_file(env) == {"LTG_WORKERS": "4", "LTG_LOG_LEVEL": "debug"}


def test_settings_from_environment(monkeypatch):
    monkeypatch.setenv("LTG_WORKERS", "3")
    monkeypatch.setenv("LTG_TEST_SET_CAP", "50")
    monkeypatch.setenv("LTG_EXPANSION_LIMIT", "128")
    assert utils.get_worker_count() == 3
    assert utils.get_test_set_cap() == 50
    assert utils.get_expansion_limit() == 128


def test_invalid_settings_fall_back_to_defaults(monkeypatch):
    monkeypatch.setenv("LTG_WORKERS", "many")
    monkeypatch.setenv("LTG_TEST_SET_CAP", "-1")
    monkeypatch.setenv("LTG_LOG_LEVEL", "chatty")
    assert utils.get_worker_count() == utils.DEFAULT_WORKERS
    assert utils.get_test_set_cap() == utils.DEFAULT_TEST_SET_CAP
    assert utils.get_log_level() == utils.DEFAULT_LOG_LEVEL


def test_log_level_is_upper_cased(monkeypatch):
    monkeypatch.setenv("LTG_LOG_LEVEL", "info")
    assert utils.get_log_level() == "INFO"


def test_configure_logging_mirrors_to_file(tmp_path):
    log_file = tmp_path / "run.log"
    utils.configure_logging("INFO", log_file)
    logging.getLogger("ltg_equiv.test").info("hello from the test")
    for handler in logging.getLogger().handlers:
        handler.flush()
    assert "hello from the test" in log_file.read_text()
    utils.configure_logging("WARNING")
