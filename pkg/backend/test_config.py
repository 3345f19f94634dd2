import pytest

from app.core.config import Settings


def test_settings_defaults():
    """Test runner defaults"""
    config = Settings(DEFAULT_SEED=42, WORKERS=1)
    assert config.APP_NAME == "ChiralCalc"
    assert config.API_V1_STR == "/api/v1"
    assert config.DEFAULT_SEED == 42


@pytest.mark.parametrize("field", ["WORKERS", "RESIDUE_SAMPLES", "SESQUILINEARITY_CASES", "SPANNING_INPUT_CAP"])
def test_settings_reject_non_positive_sizes(field):
    with pytest.raises(ValueError):
        Settings(**{field: 0})


def test_settings_reject_negative_table_sizes():
    with pytest.raises(ValueError):
        Settings(TABLE_D_CAP=-1)
