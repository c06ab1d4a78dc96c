import json

import numpy as np
import pytest

from releq import (
    Configuration,
    DocumentError,
    Problem,
    document_from,
    dumps_document,
    parse_document,
    save_document,
)
from releq.documents import load_document, write_text_atomic

import oracles


@pytest.fixture
def oracle_doc_text():
    prob = Problem(2, [1.0, 1.0], [1.0], -1.5)
    cfg = Configuration(oracles.two_body_points(1.0, 1.0, 1.0, -1.5))
    return dumps_document(document_from(prob, cfg, {"note": "oracle"}))


def test_round_trip_is_fixed_point(oracle_doc_text):
    doc = parse_document(oracle_doc_text)
    text = dumps_document(doc)
    assert text == oracle_doc_text
    assert dumps_document(parse_document(text)) == text


def test_parsed_values(oracle_doc_text):
    doc = parse_document(oracle_doc_text)
    prob = doc.problem()
    cfg = doc.configuration()
    assert prob.n == 2 and prob.k == 2 and prob.a == -1.5
    assert cfg.points.shape == (2, 2)
    assert doc.metadata == {"note": "oracle"}


def test_positions_optional():
    prob = Problem(2, [1.0, 1.0, 1.0], [1.0], -1.5)
    doc = parse_document(dumps_document(document_from(prob)))
    assert doc.positions is None
    assert doc.configuration() is None


def test_syntax_error_carries_line():
    with pytest.raises(DocumentError, match="line 2"):
        parse_document('{\n  "schema_version": }')


@pytest.mark.parametrize("mutate,field", [
    (lambda d: d.pop("exponent"), "exponent"),
    (lambda d: d.update(exponent=-0.3), "exponent"),
    (lambda d: d.update(exponent="x"), "exponent"),
    (lambda d: d.update(dimension=1), "dimension"),
    (lambda d: d.update(dimension=2.5), "dimension"),
    (lambda d: d.update(masses=[1.0]), "masses"),
    (lambda d: d.update(masses=[1.0, -1.0]), "masses"),
    (lambda d: d.update(frequencies=[1.0, 2.0]), "frequencies"),
    (lambda d: d.update(positions=[[0.0, 0.0]]), "positions"),
    (lambda d: d.update(positions=[[1.0], [-1.0]]), "positions"),
    (lambda d: d.update(metadata={"a": 1}), "metadata"),
    (lambda d: d.update(schema_version="99"), "schema_version"),
    (lambda d: d.update(bogus=1), "bogus"),
])
def test_field_errors(oracle_doc_text, mutate, field):
    raw = json.loads(oracle_doc_text)
    mutate(raw)
    with pytest.raises(DocumentError) as err:
        parse_document(json.dumps(raw))
    assert field.strip() in str(err.value)


def test_colliding_positions_rejected(oracle_doc_text):
    raw = json.loads(oracle_doc_text)
    raw["positions"] = [[0.0, 0.0], [1e-14, 0.0]]
    with pytest.raises(DocumentError):
        parse_document(json.dumps(raw))


def test_save_and_load(tmp_path, oracle_doc_text):
    path = tmp_path / "doc.json"
    save_document(path, parse_document(oracle_doc_text))
    assert path.read_text() == oracle_doc_text
    doc = load_document(path)
    assert doc.dimension == 2


def test_atomic_write_leaves_no_temp_files(tmp_path):
    path = tmp_path / "out.json"
    write_text_atomic(path, "hello\n")
    write_text_atomic(path, "world\n")
    assert path.read_text() == "world\n"
    assert [p.name for p in tmp_path.iterdir()] == ["out.json"]


def test_numbers_round_trip_bit_faithfully():
    values = [0.1, 1.0 / 3.0, 2.0 ** 0.5, 1e-300, -1.2345678901234567e17]
    prob = Problem(2, [1.0, 1.0], [1.0], -1.5)
    cfg = Configuration(np.array([[values[0], values[1]],
                                  [values[2], values[3]]]) + 1.0)
    text = dumps_document(document_from(prob, cfg))
    back = parse_document(text).configuration()
    assert np.array_equal(back.points, cfg.points)
