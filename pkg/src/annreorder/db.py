import json
import sqlite3
import zlib
from typing import List, NamedTuple, Optional, Sequence, Tuple

from annreorder.bench.harness import BenchRecord


class TestResult(NamedTuple):
    test_name: str
    pass_fail: str
    log: str
    result_set: str
    duration: float
    run_nr: int


class NoSuchResultSet(Exception):
    pass


class ResultSetInUse(Exception):
    pass


class Results:
    """
    sqlite store for suite results and bench records, both grouped by
    result set.
    """

    def __init__(self, path):
        self._conn = sqlite3.connect(path)
        self._create_tables()

    def __enter__(self):
        return self

    def __exit__(self, _exc_type, _exc_value, _traceback):
        self._conn.close()

    def _create_tables(self):
        cursor = self._conn.cursor()

        cursor.execute(
            """
        CREATE TABLE IF NOT EXISTS result_sets (
            result_set_id INTEGER PRIMARY KEY,
            result_set TEXT UNIQUE
        )
        """
        )

        cursor.execute(
            """
        CREATE TABLE IF NOT EXISTS test_names (
            test_name_id INTEGER PRIMARY KEY,
            test_name TEXT UNIQUE
        )
        """
        )

        cursor.execute(
            """
        CREATE TABLE IF NOT EXISTS test_results (
            test_id INTEGER PRIMARY KEY,
            test_name_id INTEGER,
            pass_fail TEXT,
            log BLOB,
            result_set_id INTEGER,
            duration REAL,
            run_nr INTEGER,
            FOREIGN KEY (result_set_id) REFERENCES result_sets (result_set_id)
            FOREIGN KEY (test_name_id) REFERENCES test_names (test_name_id),
            UNIQUE (test_name_id, result_set_id, run_nr)
        )
        """
        )

        # one row per (index, dataset, reorder, L) measurement
        cursor.execute(
            """
        CREATE TABLE IF NOT EXISTS bench_records (
            record_id INTEGER PRIMARY KEY,
            result_set_id INTEGER,
            index_label TEXT,
            dataset TEXT,
            reorder TEXT,
            L INTEGER,
            k INTEGER,
            recall REAL,
            qps REAL,
            qps_std REAL,
            speedup REAL,
            trials INTEGER,
            mean_latency REAL,
            mean_hops REAL,
            mean_distance_evals REAL,
            timer_warning INTEGER,
            timings TEXT,
            manifest BLOB,
            FOREIGN KEY (result_set_id) REFERENCES result_sets (result_set_id)
        )
        """
        )

        self._conn.commit()

    def insert_result_set(self, result_set):
        cursor = self._conn.cursor()
        cursor.execute(
            "INSERT OR IGNORE INTO result_sets (result_set) VALUES (?)", (result_set,)
        )
        self._conn.commit()

    def get_result_set_id(self, result_set):
        cursor = self._conn.cursor()
        cursor.execute(
            "SELECT result_set_id FROM result_sets WHERE result_set = ?", (result_set,)
        )
        row = cursor.fetchone()

        if row is None:
            return None

        return row[0]

    def insert_test_name(self, test_name):
        cursor = self._conn.cursor()
        cursor.execute(
            "INSERT OR IGNORE INTO test_names (test_name) VALUES (?)", (test_name,)
        )
        self._conn.commit()

    def get_test_name_id(self, test_name):
        cursor = self._conn.cursor()
        cursor.execute(
            "SELECT test_name_id FROM test_names WHERE test_name = ?", (test_name,)
        )
        row = cursor.fetchone()

        if row is None:
            return None

        return row[0]

    def insert_test_result(self, result: TestResult, with_delete: bool):
        self.insert_test_name(result.test_name)
        test_name_id = self.get_test_name_id(result.test_name)

        self.insert_result_set(result.result_set)
        result_set_id = self.get_result_set_id(result.result_set)

        cursor = self._conn.cursor()
        if with_delete:
            cursor.execute(
                "DELETE FROM test_results WHERE test_name_id = ? AND result_set_id = ?",
                (test_name_id, result_set_id),
            )

        cursor.execute(
            "INSERT INTO test_results (test_name_id, pass_fail, log, result_set_id, duration, run_nr) VALUES (?, ?, ?, ?, ?, ?)",
            (
                test_name_id,
                result.pass_fail,
                zlib.compress(result.log.encode("utf-8")),
                result_set_id,
                result.duration,
                result.run_nr,
            ),
        )
        self._conn.commit()

    def get_test_results(
        self, test_name: str, result_set: str, run_nr: Optional[int] = None
    ) -> List[TestResult]:
        test_name_id = self.get_test_name_id(test_name)
        result_set_id = self.get_result_set_id(result_set)
        if test_name_id is None or result_set_id is None:
            return []

        sql_cmd = """
            SELECT test_names.test_name, test_results.pass_fail, test_results.log, result_sets.result_set, test_results.duration, test_results.run_nr
            FROM test_results
            JOIN test_names ON test_results.test_name_id = test_names.test_name_id
            JOIN result_sets ON test_results.result_set_id = result_sets.result_set_id
            WHERE test_results.test_name_id = ? AND test_results.result_set_id = ?
        """
        sql_args: Tuple = (test_name_id, result_set_id)
        if run_nr is not None:
            sql_cmd += " AND test_results.run_nr = ?"
            sql_args = (test_name_id, result_set_id, run_nr)

        cursor = self._conn.cursor()
        cursor.execute(sql_cmd, sql_args)

        return [
            TestResult(
                test_name=row[0],
                pass_fail=row[1],
                log=zlib.decompress(row[2]).decode("utf-8"),
                result_set=row[3],
                duration=row[4],
                run_nr=row[5],
            )
            for row in cursor.fetchall()
        ]

    # -----------------------------------------
    # bench records

    def insert_bench_records(
        self, result_set: str, records: Sequence[BenchRecord], manifest: dict, with_delete=True
    ):
        """Store a bench run.  By default it replaces earlier records of the set."""
        self.insert_result_set(result_set)
        result_set_id = self.get_result_set_id(result_set)
        blob = zlib.compress(json.dumps(manifest, sort_keys=True).encode("utf-8"))

        cursor = self._conn.cursor()
        if with_delete:
            cursor.execute("DELETE FROM bench_records WHERE result_set_id = ?", (result_set_id,))

        cursor.executemany(
            """INSERT INTO bench_records (result_set_id, index_label, dataset, reorder, L, k,
               recall, qps, qps_std, speedup, trials, mean_latency, mean_hops,
               mean_distance_evals, timer_warning, timings, manifest)
               VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)""",
            [
                (
                    result_set_id,
                    r.index,
                    r.dataset,
                    r.reorder,
                    r.L,
                    r.k,
                    r.recall,
                    r.qps,
                    r.qps_std,
                    r.speedup,
                    r.trials,
                    r.mean_latency,
                    r.mean_hops,
                    r.mean_distance_evals,
                    int(r.timer_warning),
                    json.dumps(list(r.timings)),
                    blob,
                )
                for r in records
            ],
        )
        self._conn.commit()

    def get_bench_records(self, result_set: str) -> List[BenchRecord]:
        result_set_id = self.get_result_set_id(result_set)
        if result_set_id is None:
            raise NoSuchResultSet(f"Result set '{result_set}' not found")

        cursor = self._conn.cursor()
        cursor.execute(
            """SELECT index_label, dataset, reorder, L, k, recall, qps, qps_std, speedup,
               trials, mean_latency, mean_hops, mean_distance_evals, timer_warning, timings
               FROM bench_records WHERE result_set_id = ? ORDER BY record_id""",
            (result_set_id,),
        )
        return [
            BenchRecord(*row[:13], timer_warning=bool(row[13]), timings=tuple(json.loads(row[14])))
            for row in cursor.fetchall()
        ]

    def get_bench_manifest(self, result_set: str) -> Optional[dict]:
        result_set_id = self.get_result_set_id(result_set)
        cursor = self._conn.cursor()
        cursor.execute(
            "SELECT manifest FROM bench_records WHERE result_set_id = ? LIMIT 1", (result_set_id,)
        )
        row = cursor.fetchone()
        if row is None:
            return None
        return json.loads(zlib.decompress(row[0]).decode("utf-8"))

    # -----------------------------------------
    # result sets

    def get_result_sets(self) -> List[str]:
        cursor = self._conn.cursor()
        cursor.execute("SELECT result_set FROM result_sets")
        return [row[0] for row in cursor.fetchall()]

    # Removes a result_set with every test result and bench record in it.
    def delete_result_set(self, result_set):
        cursor = self._conn.cursor()
        result_set_id = self.get_result_set_id(result_set)

        if result_set_id is None:
            raise NoSuchResultSet(f"Result set '{result_set}' not found")

        cursor.execute("DELETE FROM test_results WHERE result_set_id = ?", (result_set_id,))
        cursor.execute("DELETE FROM bench_records WHERE result_set_id = ?", (result_set_id,))
        cursor.execute("DELETE FROM result_sets WHERE result_set_id = ?", (result_set_id,))
        self._conn.commit()

    def rename_result_set(self, old_result_set, new_result_set):
        cursor = self._conn.cursor()
        result_set_id = self.get_result_set_id(old_result_set)

        if result_set_id is None:
            raise NoSuchResultSet(f"Result set '{old_result_set}' not found")

        if self.get_result_set_id(new_result_set) is not None:
            raise ResultSetInUse(f"Result set '{new_result_set}' already exists")

        cursor.execute(
            "UPDATE result_sets SET result_set = ? WHERE result_set_id = ?",
            (new_result_set, result_set_id),
        )
        self._conn.commit()
