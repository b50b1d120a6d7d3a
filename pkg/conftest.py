import pytest


# Keeps commands run without --out from writing into the checkout
@pytest.fixture(autouse=True)
def isolated_output_root(settings, tmp_path):
    settings.PFENKF_OUTPUT_ROOT = str(tmp_path / 'runs')
