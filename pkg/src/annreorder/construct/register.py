import annreorder.construct.exact_tests as exact_tests
import annreorder.construct.nn_descent_tests as nn_descent_tests
import annreorder.construct.vamana_tests as vamana_tests


def register(tests):
    exact_tests.register(tests)
    nn_descent_tests.register(tests)
    vamana_tests.register(tests)
