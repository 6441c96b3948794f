import pytest

from oic360 import container, encoder, fixtures


@pytest.fixture(scope="session")
def fimg():
    return fixtures.synthetic_equirect()


@pytest.fixture(scope="session")
def trace_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("trace") / "trace.csv"
    fixtures.write_trace(path, fixtures.synthetic_trace(n_users=3, n_requests=10))
    return path


@pytest.fixture(scope="session")
def ftrace(trace_path):
    return container.load_trace(trace_path)


@pytest.fixture(scope="session")
def enc_theo(fimg):
    return {qp: encoder.encode_image(fimg, qp=qp, mode="theoretical")
            for qp in (22, 42)}


@pytest.fixture(scope="session")
def enc_prac(fimg):
    return {qp: encoder.encode_image(fimg, qp=qp, mode="practical")
            for qp in (22, 42)}
