import annreorder.bench.dimension_tests as dimension_tests
import annreorder.bench.harness_tests as harness_tests
import annreorder.bench.metrics_tests as metrics_tests
import annreorder.bench.records_tests as records_tests


def register(tests):
    metrics_tests.register(tests)
    harness_tests.register(tests)
    records_tests.register(tests)
    dimension_tests.register(tests)
