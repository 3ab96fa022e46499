"""Input assignments: the serializable binding of input symbols to values.

An assignment maps symbol names to entries ``{"tag": <type tag>, "value":
<wire-encoded primitive>}``.  Structured inputs are flattened: the object
symbol ``S`` with a property ``p`` stores the property under the derived
name ``S."p"`` (see :func:`polyforge.symobjects.path_join`).  Array element
sort choices for the homogeneous encoding live under ``<name>#sort``.

Materialization rebuilds concrete values from an assignment; it is the
bridge from solver models to runnable test inputs and the basis of the
concrete-only verification runs.
"""

from __future__ import annotations

import json
from typing import Any, Optional

from . import symcore as S
from . import values as V
from .symobjects import path_join, path_split, is_generation_name
from .values import UNDEFINED, NULL, JSObject, Value

Assignment = dict  # name -> {"tag": str, "value": encoded | None} | {"sort": str}


def entry_for(assignment: Assignment, name: str) -> Optional[dict]:
    e = assignment.get(name)
    if e is None or "tag" not in e:
        return None
    return e


def entry_tag(assignment: Assignment, name: str, default: str = "undefined") -> str:
    e = entry_for(assignment, name)
    return e["tag"] if e else default


def entry_primitive(assignment: Assignment, name: str,
                    tag: Optional[str] = None) -> Value:
    """Concrete primitive for a bound symbol (tag default when unbound)."""
    e = entry_for(assignment, name)
    if e is None:
        return S.tag_default(tag) if tag in S._TAG_DEFAULTS else UNDEFINED
    tag = e["tag"]
    if tag in ("object", "array"):
        raise ValueError(f"{name} is not primitive")
    if e.get("value") is not None:
        return V.decode_value(e["value"])
    return S.tag_default(tag)


def elem_sort(assignment: Assignment, name: str) -> str:
    e = assignment.get(name + "#sort")
    if e and "sort" in e:
        return e["sort"]
    return S.NUM


def child_entries(assignment: Assignment, parent: str) -> dict[str, str]:
    """Map property key -> derived symbol name for direct children."""
    parent_root, parent_keys = path_split(parent)
    out: dict[str, str] = {}
    for name in assignment:
        if name.endswith("#sort") or name.endswith("#arr") or is_generation_name(name):
            continue
        root, keys = path_split(name)
        if root != parent_root or len(keys) != len(parent_keys) + 1:
            continue
        if keys[:-1] != parent_keys:
            continue
        out[keys[-1]] = name
    return dict(sorted(out.items()))


def materialize_value(assignment: Assignment, name: str) -> Value:
    """Concrete value for a symbol under an assignment (defaults applied)."""
    tag = entry_tag(assignment, name)
    if tag == "object":
        obj = JSObject("object")
        for key, child in child_entries(assignment, name).items():
            obj.props[key] = materialize_value(assignment, child)
        return obj
    if tag == "array":
        arr = JSObject("array")
        children = child_entries(assignment, name)
        length = 0
        if "length" in children:
            length_v = materialize_value(assignment, children["length"])
            length = int(V.to_uint32(length_v))
        for key, child in children.items():
            if key == "length":
                continue
            arr.props[key] = materialize_value(assignment, child)
            if key.isdigit():
                length = max(length, int(key) + 1)
        arr.length = length
        return arr
    return entry_primitive(assignment, name)


def assignment_from_model(model: dict[str, Any], tags: dict[str, str],
                          sorts: dict[str, str]) -> Assignment:
    """Build an assignment from a solver model plus per-symbol tag decisions
    and homogeneous element-sort choices."""
    out: Assignment = {}
    for name, tag in tags.items():
        entry: dict = {"tag": tag}
        if tag not in ("object", "array", "undefined", "null"):
            if name in model:
                entry["value"] = V.encode_value(model[name])
        out[name] = entry
    for name, value in model.items():
        if name in out or name.endswith("#arr"):
            continue
        if isinstance(value, list):
            continue
        root, keys = path_split(name)
        tag = V.type_tag(value) if not isinstance(value, JSObject) else "object"
        out[name] = {"tag": tag, "value": V.encode_value(value)}
    # homogeneous array contents arrive as list models on the "#arr" var
    for name, value in model.items():
        if name.endswith("#arr") and isinstance(value, list):
            base = name[:-len("#arr")]
            for i, el in enumerate(value):
                child = path_join(base, str(i))
                out.setdefault(child, {"tag": V.type_tag(el),
                                       "value": V.encode_value(el)})
    for name, sort in sorts.items():
        out[name + "#sort"] = {"sort": sort}
    return out


def canonical_assignment(assignment: Assignment) -> str:
    """Injective canonical serialization used for dedup hashing."""
    return json.dumps(assignment, sort_keys=True, separators=(",", ":"))
