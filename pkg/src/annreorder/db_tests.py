import annreorder.db as db
from annreorder.assertions import assert_equal, assert_raises
from annreorder.bench.records_tests import RECORDS


def t_test_results(fix):
    with fix.temp_dir() as td:
        with db.Results(td.file("results.db")) as results:
            for run_nr in range(2):
                r = db.TestResult("/graph/metric", "PASS", f"log {run_nr}\n", "laptop", 0.5 + run_nr, run_nr)
                results.insert_test_result(r, with_delete=(run_nr == 0))

            stored = results.get_test_results("/graph/metric", "laptop")
            assert_equal([r.log for r in stored], ["log 0\n", "log 1\n"])
            assert_equal(results.get_test_results("/graph/metric", "laptop", run_nr=1)[0].duration, 1.5)
            assert_equal(results.get_test_results("/graph/missing", "laptop"), [])

            # a fresh first run replaces the earlier ones
            results.insert_test_result(db.TestResult("/graph/metric", "FAIL", "", "laptop", 0.1, 0), with_delete=True)
            stored = results.get_test_results("/graph/metric", "laptop")
            assert_equal([r.pass_fail for r in stored], ["FAIL"])


def t_bench_records(fix):
    with fix.temp_dir() as td:
        with db.Results(td.file("results.db")) as results:
            results.insert_bench_records("desk", RECORDS, {"average_lcc": 0.25, "config": {"k": 10}})
            assert_equal(results.get_bench_records("desk"), RECORDS)
            assert_equal(results.get_bench_manifest("desk")["average_lcc"], 0.25)

            results.insert_bench_records("desk", RECORDS[:1], {"average_lcc": 0.5})
            assert_equal(results.get_bench_records("desk"), RECORDS[:1])
            assert_equal(results.get_bench_manifest("desk"), {"average_lcc": 0.5})

            assert_raises(lambda: results.get_bench_records("nowhere"), db.NoSuchResultSet)
            assert results.get_bench_manifest("nowhere") is None


def t_result_sets(fix):
    with fix.temp_dir() as td:
        with db.Results(td.file("results.db")) as results:
            results.insert_bench_records("a", RECORDS, {})
            results.insert_test_result(db.TestResult("/x", "PASS", "", "b", 0.0, 0), with_delete=True)
            assert_equal(sorted(results.get_result_sets()), ["a", "b"])

            assert_raises(lambda: results.rename_result_set("a", "b"), db.ResultSetInUse)
            assert_raises(lambda: results.rename_result_set("zz", "c"), db.NoSuchResultSet)
            results.rename_result_set("a", "c")
            assert_equal(len(results.get_bench_records("c")), len(RECORDS))

            results.delete_result_set("c")
            assert_equal(results.get_result_sets(), ["b"])
            assert_raises(lambda: results.delete_result_set("c"), db.NoSuchResultSet)

        # data survives reopening
        with db.Results(td.file("results.db")) as results:
            assert_equal(len(results.get_test_results("/x", "b")), 1)


def register(tests):
    tests.register_batch(
        "/db/",
        [
            ("test-results", t_test_results),
            ("bench-records", t_bench_records),
            ("result-sets", t_result_sets),
        ],
    )
