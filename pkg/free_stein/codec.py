"""JSON text form for NCPoly, TensorPoly and KernelMatrix.

Words are lists of letter tags (["t", 1], ["b", 1]), both numbered from 1.
B-slots are written out only when B is non-trivial. Coefficients are [re, im] pairs of rational strings.
"""
import json
from typing import Any, Sequence

from .errors import ModelSpecError, StructuralError
from .ncalg import GeneratorSystem, KernelMatrix, NCPoly, TensorPoly, Word
from .scalars import QQi


def word_to_tags(w: Word, system: GeneratorSystem) -> list:
    tags = []
    for k, slot in enumerate(w.slots):
        if not system.b.trivial:
            tags.append(["b", slot + 1])
        if k < w.degree:
            tags.append(["t", w.letters[k] + 1])
    return tags


def tags_to_poly(tags: Sequence, system: GeneratorSystem) -> NCPoly:
    out = NCPoly.one(system)
    for tag in tags:
        try:
            kind, index = tag
        except (TypeError, ValueError):
            raise ModelSpecError("terms", f"malformed letter tag {tag!r}") from None
        if kind == "t":
            out = out * NCPoly.variable(system, int(index) - 1)
        elif kind == "b":
            out = out * NCPoly.b_element(system, int(index) - 1)
        else:
            raise ModelSpecError("terms", f"unknown letter kind {kind!r}")
    return out


def _check_n(data: dict, system: GeneratorSystem) -> None:
    if data.get("n") != system.n:
        raise StructuralError(f"serialized over n={data.get('n')}, system has n={system.n}")


def poly_to_json(p: NCPoly) -> dict[str, Any]:
    return {"n": p.system.n,
            "terms": [[word_to_tags(w, p.system), c.to_pair()] for w, c in p.items()]}


def poly_from_json(data: dict, system: GeneratorSystem) -> NCPoly:
    _check_n(data, system)
    total = NCPoly.zero(system)
    for tags, pair in data["terms"]:
        total = total + tags_to_poly(tags, system) * QQi.from_pair(pair)
    return total


def tensor_to_json(u: TensorPoly) -> dict[str, Any]:
    system = u.system
    return {"n": system.n,
            "terms": [[word_to_tags(a, system), word_to_tags(b, system), c.to_pair()]
                      for (a, b), c in u.items()]}


def tensor_from_json(data: dict, system: GeneratorSystem) -> TensorPoly:
    _check_n(data, system)
    total = TensorPoly.zero(system)
    for left, right, pair in data["terms"]:
        term = TensorPoly.elementary(tags_to_poly(left, system), tags_to_poly(right, system))
        total = total + term * QQi.from_pair(pair)
    return total


def kernel_to_json(A: KernelMatrix) -> dict[str, Any]:
    return {"n": A.system.n, "size": A.size,
            "entries": [[tensor_to_json(e) for e in row] for row in A.rows()]}


def kernel_from_json(data: dict, system: GeneratorSystem) -> KernelMatrix:
    _check_n(data, system)
    return KernelMatrix(system, [[tensor_from_json(e, system) for e in row]
                                 for row in data["entries"]])


def polys_to_json(P: Sequence[NCPoly]) -> list[dict[str, Any]]:
    return [poly_to_json(p) for p in P]


def polys_from_json(data: Sequence[dict], system: GeneratorSystem) -> tuple[NCPoly, ...]:
    return tuple(poly_from_json(item, system) for item in data)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True)


def loads(text: str):
    return json.loads(text)
