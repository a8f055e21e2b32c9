import pytest

from auditbench.config import VC_KINDS
from auditbench.vcgen import AnomalyConfig, SynthSpec, acquire_base, generate_dataset


@pytest.fixture(scope="session")
def vc10k():
    base = acquire_base(SynthSpec(10_000, seed=42))
    return generate_dataset(base, cfg=AnomalyConfig(seed=42))


@pytest.fixture(scope="session")
def vc1k():
    base = acquire_base(SynthSpec(1_000, seed=5))
    return generate_dataset(base, cfg=AnomalyConfig(seed=5))


@pytest.fixture
def vc_kinds():
    return dict(VC_KINDS)
