import sqlite3
import pytest
from datetime import datetime, timezone
from unittest.mock import patch

from src.db import get_db_connection, get_history, init_db, record_timing


class TestTimingLedger:
    @pytest.fixture
    def db_path(self, tmp_path):
        path = str(tmp_path / 'nested' / 'bench.db')
        assert init_db(path)
        return path

    def test_init_creates_parent_directory(self, db_path, tmp_path):
        assert (tmp_path / 'nested').is_dir()
        with get_db_connection(db_path) as conn:
            tables = {r[0] for r in conn.execute("SELECT name FROM sqlite_master WHERE type='table'")}
        assert 'timings' in tables

    def test_init_is_idempotent(self, db_path):
        assert init_db(db_path)

    def test_record_and_read_back(self, db_path):
        when = datetime(2024, 1, 2, 3, 4, 5, tzinfo=timezone.utc)
        assert record_timing('speer', 'minimal-janet', 49, 1.25, db_path=db_path, recorded_at=when)

        rows = get_history(db_path=db_path)
        assert rows == [{
            'problem': 'speer',
            'command': 'minimal-janet',
            'basis_size': 49,
            'seconds': 1.25,
            'recorded_at': when.isoformat(),
        }]

    def test_most_recent_first_and_filters(self, db_path):
        record_timing('speer', 'janet', 71, 2.0, db_path=db_path)
        record_timing('speer', 'groebner', 44, 1.0, db_path=db_path)
        record_timing('cyclic7', 'janet', 100, 9.0, db_path=db_path)

        assert [r['problem'] for r in get_history(db_path=db_path)] == ['cyclic7', 'speer', 'speer']
        assert [r['command'] for r in get_history('speer', db_path=db_path)] == ['groebner', 'janet']
        assert [r['basis_size'] for r in get_history(command='janet', db_path=db_path)] == [100, 71]
        assert len(get_history(db_path=db_path, limit=1)) == 1

    def test_record_failure_returns_false(self, db_path):
        with patch('src.db.sqlite3.connect', side_effect=sqlite3.OperationalError("locked")):
            assert not record_timing('speer', 'janet', 71, 2.0, db_path=db_path)

    def test_history_without_table(self, tmp_path):
        assert get_history(db_path=str(tmp_path / 'fresh.db')) == []
