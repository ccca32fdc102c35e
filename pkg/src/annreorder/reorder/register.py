import annreorder.reorder.ordering_tests as ordering_tests
import annreorder.reorder.permfile_tests as permfile_tests
import annreorder.reorder.topology_tests as topology_tests


def register(tests):
    ordering_tests.register(tests)
    permfile_tests.register(tests)
    topology_tests.register(tests)
