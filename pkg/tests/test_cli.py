import threading

import pytest

from lsrp import cli
from lsrp.credstore import CredentialStore
from lsrp.srp_core import register

LAMBDA_HEX = ("01" * 32)
SALT = b"\x00" * 16

TOY_FLAGS = ["--n", "8", "--q", "1153", "--tau", "1.0", "--lambda-seed", LAMBDA_HEX]


@pytest.fixture
def server(tmp_path, toy):
    store = CredentialStore.open(str(tmp_path / "creds.db"), toy)
    store.put(register(toy, b"alice", b"pw", salt=SALT))
    srv = cli.LsrpServer(("127.0.0.1", 0), toy, store)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()
    thread.join(timeout=5)


def addr(srv):
    return srv.server_address[:2]


def test_login_round_trip(server, toy, caplog):
    import logging
    import time

    with caplog.at_level(logging.INFO, logger="lsrp"):
        code, digest = cli.run_login(toy, b"alice", b"pw", addr(server))
        # the server handler thread logs its digest after replying; wait for it
        deadline = time.monotonic() + 5
        while time.monotonic() < deadline:
            if any("auth ok" in rec.getMessage() for rec in caplog.records):
                break
            time.sleep(0.01)
    assert code == cli.EXIT_OK
    assert digest is not None and len(digest) == 32
    # both endpoints derived the same session-key digest
    assert any(digest in rec.getMessage() for rec in caplog.records
               if "auth ok" in rec.getMessage())


def test_login_wrong_password(server, toy):
    code, digest = cli.run_login(toy, b"alice", b"xx", addr(server))
    assert code == cli.EXIT_AUTH_FAILED and digest is None


def test_login_unknown_id_rejected_via_decoy(server, toy):
    code, digest = cli.run_login(toy, b"nobody", b"pw", addr(server))
    assert code == cli.EXIT_AUTH_FAILED and digest is None


def test_login_fresh_keys_per_session(server, toy):
    digests = {cli.run_login(toy, b"alice", b"pw", addr(server))[1] for _ in range(3)}
    assert len(digests) == 3


def test_login_unreachable(toy):
    code, digest = cli.run_login(toy, b"alice", b"pw", ("127.0.0.1", 1))
    assert code == cli.EXIT_UNREACHABLE and digest is None


def test_main_register_then_login(tmp_path, server, capsys):
    pw = tmp_path / "pw.txt"
    pw.write_bytes(b"s3cret\n")
    store = str(tmp_path / "main.db")
    code = cli.main(["register", *TOY_FLAGS, "--store", store,
                     "--id", "bob", "--password-file", str(pw)])
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "registered id=bob" in out and "verifier-digest=" in out

    # point the running server at the updated store
    server.store = CredentialStore.open(store, server.params)
    host, port = addr(server)
    code = cli.main(["login", *TOY_FLAGS, "--server", f"{host}:{port}",
                     "--id", "bob", "--password-file", str(pw)])
    assert code == cli.EXIT_OK
    assert "login ok key-digest=" in capsys.readouterr().out


def test_main_register_requires_store_path(tmp_path, monkeypatch):
    monkeypatch.delenv("LSRP_STORE", raising=False)
    pw = tmp_path / "pw.txt"
    pw.write_bytes(b"x")
    code = cli.main(["register", *TOY_FLAGS, "--id", "bob",
                     "--password-file", str(pw)])
    assert code == cli.EXIT_ERROR


def test_main_store_path_from_environment(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("LSRP_STORE", str(tmp_path / "env.db"))
    pw = tmp_path / "pw.txt"
    pw.write_bytes(b"x")
    assert cli.main(["register", *TOY_FLAGS, "--id", "bob",
                     "--password-file", str(pw)]) == cli.EXIT_OK
    capsys.readouterr()


def test_main_simulate(capsys):
    code = cli.main(["simulate", *TOY_FLAGS, "--trials", "5", "--seed", "ab" * 32])
    assert code == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "agreements" in out and "trials" in out


def test_main_simulate_csv(tmp_path, capsys):
    csv = tmp_path / "report.csv"
    code = cli.main(["simulate", *TOY_FLAGS, "--trials", "3",
                     "--instrument", "--csv", str(csv)])
    assert code == cli.EXIT_OK
    assert csv.read_text().startswith("trials,")
    capsys.readouterr()


def test_main_lemma_oracle(capsys):
    assert cli.main(["lemma-oracle", "13", "41"]) == cli.EXIT_OK
    assert cli.main(["lemma-oracle", "41", "--tolerance", "15"]) == cli.EXIT_ERROR
    assert cli.main(["lemma-oracle", "100001"]) == cli.EXIT_ERROR
    capsys.readouterr()


def test_main_regev(capsys):
    assert cli.main(["regev", "--trials", "200", "--seed", "cd" * 32]) == cli.EXIT_OK
    out = capsys.readouterr().out
    assert "p=4099" in out and "accuracy=" in out


def test_main_rejects_unsafe_params_without_flag(capsys):
    code = cli.main(["simulate", "--n", "2", "--q", "41", "--tau", "1.0",
                     "--lambda-seed", LAMBDA_HEX, "--trials", "1"])
    assert code == cli.EXIT_ERROR


def test_parse_addr_forms():
    assert cli.parse_addr("127.0.0.1:7464") == ("127.0.0.1", 7464)
    assert cli.parse_addr(":9000") == ("127.0.0.1", 9000)


def test_config_file_supplies_params(tmp_path, capsys):
    cfg = tmp_path / "toy.cfg"
    cfg.write_text("n = 8\nq = 1153\ntau = 1.0\nlambda_seed = {}\n".format(LAMBDA_HEX))
    assert cli.main(["simulate", "--config", str(cfg), "--trials", "2"]) == cli.EXIT_OK
    capsys.readouterr()
