import sqlite3
import logging
from contextlib import contextmanager
from datetime import datetime, timezone
from pathlib import Path

DEFAULT_DB_PATH = 'data/benchmarks.db'


@contextmanager
def get_db_connection(db_path=DEFAULT_DB_PATH):
    """Context manager for database connections with proper error handling."""
    Path(db_path).parent.mkdir(parents=True, exist_ok=True)

    conn = None
    try:
        conn = sqlite3.connect(db_path, timeout=30.0)
        conn.execute('PRAGMA journal_mode = WAL')
        yield conn
    except sqlite3.Error as e:
        logging.error(f"Database error: {e}")
        if conn:
            conn.rollback()
        raise
    finally:
        if conn:
            conn.close()


def init_db(db_path=DEFAULT_DB_PATH):
    """Initialize the timing ledger schema. Returns True if successful."""
    try:
        with get_db_connection(db_path) as conn:
            conn.execute('''
                CREATE TABLE IF NOT EXISTS timings (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    problem TEXT NOT NULL,
                    command TEXT NOT NULL,
                    basis_size INTEGER NOT NULL,
                    seconds REAL NOT NULL,
                    recorded_at TIMESTAMP NOT NULL
                );
            ''')
            conn.commit()
            logging.debug(f"Benchmark database ready at {db_path}")
            return True
    except sqlite3.Error as e:
        logging.error(f"Failed to initialize database: {e}")
        return False


def record_timing(problem, command, basis_size, seconds, db_path=DEFAULT_DB_PATH, recorded_at=None):
    """Append one benchmark run to the ledger."""
    recorded_at = recorded_at or datetime.now(timezone.utc)
    try:
        with get_db_connection(db_path) as conn:
            conn.execute(
                'INSERT INTO timings (problem, command, basis_size, seconds, recorded_at) VALUES (?, ?, ?, ?, ?)',
                (problem, command, int(basis_size), float(seconds), recorded_at.isoformat()))
            conn.commit()
            logging.info(f"Recorded {command} on {problem}: {basis_size} polynomials in {seconds:.3f}s")
            return True
    except sqlite3.Error as e:
        logging.error(f"Failed to record timing for {problem}: {e}")
        return False


def get_history(problem=None, command=None, db_path=DEFAULT_DB_PATH, limit=20):
    """Most recent runs first, optionally filtered by problem and command."""
    query = 'SELECT problem, command, basis_size, seconds, recorded_at FROM timings'
    clauses, params = [], []
    if problem is not None:
        clauses.append('problem = ?')
        params.append(problem)
    if command is not None:
        clauses.append('command = ?')
        params.append(command)
    if clauses:
        query += ' WHERE ' + ' AND '.join(clauses)
    query += ' ORDER BY id DESC LIMIT ?'
    params.append(int(limit))
    try:
        with get_db_connection(db_path) as conn:
            rows = conn.execute(query, params).fetchall()
    except sqlite3.Error as e:
        logging.error(f"Failed to read benchmark history: {e}")
        return []
    return [
        {'problem': r[0], 'command': r[1], 'basis_size': r[2], 'seconds': r[3], 'recorded_at': r[4]}
        for r in rows
    ]
