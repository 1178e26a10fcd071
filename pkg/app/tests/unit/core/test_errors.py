import pytest

from app.core import errors


@pytest.mark.parametrize(
    "helper, cls, exit_code, status_code",
    [
        (errors.usage_error, errors.UsageError, 1, 400),
        (errors.data_error, errors.DataError, 2, 422),
        (errors.budget_error, errors.BudgetError, 3, 409),
    ],
)
def test_helpers_raise_coded_errors(helper, cls, exit_code, status_code):
    with pytest.raises(cls) as excinfo:
        helper("SOME_CODE", "something is wrong", {"field": 1})

    exc = excinfo.value
    assert isinstance(exc, errors.SynthesisError)
    assert exc.code == "SOME_CODE"
    assert exc.message == "something is wrong"
    assert exc.details == {"field": 1}
    assert exc.exit_code == exit_code
    assert exc.status_code == status_code


def test_error_string_carries_code():
    exc = errors.DataError("DANGLING_REFERENCE", "dangling reference to table1 row 99")
    assert str(exc) == "DANGLING_REFERENCE: dangling reference to table1 row 99"


def test_to_response_shape():
    payload = errors.BudgetError("BUDGET_EXHAUSTED", "Privacy budget exhausted").to_response()
    assert payload.model_dump() == {
        "code": "BUDGET_EXHAUSTED",
        "message": "Privacy budget exhausted",
        "details": None,
    }
