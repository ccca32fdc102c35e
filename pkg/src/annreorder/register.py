import annreorder.adapter_tests as adapter_tests
import annreorder.analyzer_tests as analyzer_tests
import annreorder.bench.register as bench
import annreorder.cli_tests as cli_tests
import annreorder.config_tests as config_tests
import annreorder.construct.register as construct
import annreorder.dataset_tests as dataset_tests
import annreorder.db_tests as db_tests
import annreorder.graph_tests as graph_tests
import annreorder.reorder.register as reorder
import annreorder.search_tests as search_tests


def register(tests):
    graph_tests.register(tests)
    dataset_tests.register(tests)
    search_tests.register(tests)
    construct.register(tests)
    adapter_tests.register(tests)
    reorder.register(tests)
    analyzer_tests.register(tests)
    bench.register(tests)
    config_tests.register(tests)
    db_tests.register(tests)
    cli_tests.register(tests)
