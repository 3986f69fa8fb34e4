"""The 2k-node systematic+parity exact-repair construction."""

import pytest

from securepair.errors import FieldTooSmallError, SchemaError
from securepair.exact import (
    audit_exact,
    broadcast_rows,
    build_exact,
    code_from_json,
    code_to_json,
    default_field,
    erase_uv,
    repair_exact,
    verify_construction,
)
from securepair.fields import PrimeField


def test_default_fields():
    # smallest primes making every Vandermonde submatrix nonsingular
    assert default_field(3).p == 7
    assert default_field(4).p == 17


def test_build_and_verify_k3():
    code = build_exact(3, seed=1)
    assert code.n == 6 and code.t == 3
    assert code.num_secrets == 3
    assert verify_construction(code)


def test_minimal_prime_above_k_is_too_small():
    with pytest.raises(FieldTooSmallError) as exc:
        build_exact(3, field=PrimeField(5), seed=1)
    assert "7" in str(exc.value)


def test_k2_stores_no_secrets():
    with pytest.raises(ValueError):
        build_exact(2)


def test_erase_uv_pattern():
    code = build_exact(3, seed=1)
    pattern = erase_uv(code, 1, 3)
    assert pattern.n == 6
    # systematic nodes lose column 1, parity nodes column 3
    assert pattern.surviving[:3] == ((1, 2),) * 3
    assert pattern.surviving[3:] == ((0, 1),) * 3
    with pytest.raises(ValueError):
        erase_uv(code, 2, 2)
    with pytest.raises(ValueError):
        erase_uv(code, 0, 1)


def test_repair_exact_all_pairs_k3():
    code = build_exact(3, seed=2)
    for u in range(1, 4):
        for v in range(1, 4):
            if u == v:
                continue
            result = repair_exact(code, u, v)
            assert result.total == 2 * code.k
            assert result.recovered_systematic == code.virtual_source.column(u - 1)
            assert result.recovered_parity == code.parity.column(v - 1)


def test_repair_exact_k4():
    code = build_exact(4, seed=3)
    result = repair_exact(code, 2, 4)
    assert result.total == 8
    assert result.recovered_systematic == code.virtual_source.column(1)


def test_broadcast_values_match_matrix():
    code = build_exact(3, seed=4)
    result = repair_exact(code, 1, 2)
    flat = tuple(x for row in code.secrets.entries for x in row) + tuple(
        x for row in code.keys.entries for x in row
    )
    assert result.broadcast_matrix.mul_vector(flat) == result.broadcast_values


def test_audit_secure_when_a_key_column_is_hit():
    code = build_exact(4, seed=5)
    for u, v in [(1, 2), (2, 1), (1, 3), (3, 2), (2, 4), (4, 1)]:
        report = audit_exact(code, u, v)
        assert report.audit.leakage_qary == 0, (u, v)
        assert report.capacity_witness
        assert not report.discrepancy


def test_audit_flags_leak_on_double_masked_columns():
    # both erased columns masked by the same key sum: keys collapse,
    # leakage is reported, not hidden
    code = build_exact(4, seed=6)
    for u, v in [(3, 4), (4, 3)]:
        report = audit_exact(code, u, v)
        assert report.audit.leakage_qary == report.gamma - report.rank_keys > 0
        assert report.discrepancy
        assert not report.capacity_witness
        doc = report.to_dict()
        assert doc["discrepancy"] is True


def test_k3_has_no_double_masked_pair():
    code = build_exact(3, seed=7)
    for u in range(1, 4):
        for v in range(1, 4):
            if u != v:
                assert audit_exact(code, u, v).audit.leakage_qary == 0


def test_json_roundtrip(fixture_text):
    code = code_from_json(fixture_text("exact_k3.json"))
    assert code.k == 3 and code.field.p == 7
    assert code_to_json(code) == fixture_text("exact_k3.json")
    assert verify_construction(code)


def test_json_rejects_tampered_parity(fixture_text):
    import json

    doc = json.loads(fixture_text("exact_k3.json"))
    doc["parity"][0][0] = (doc["parity"][0][0] + 1) % doc["q"]
    with pytest.raises(SchemaError):
        code_from_json(json.dumps(doc))
