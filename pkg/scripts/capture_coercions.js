// Captures ground-truth coercion behavior from a real JavaScript engine.
// Run with:  node scripts/capture_coercions.js > tests/fixtures/coercions.jsonl
// Each line is one observation: a binary or unary operation over encoded
// operands with the engine's encoded result.
"use strict";

function enc(v, depth) {
  depth = depth || 0;
  if (depth > 6) { return { t: "opaque" }; }
  if (v === undefined) { return { t: "undefined" }; }
  if (v === null) { return { t: "null" }; }
  if (typeof v === "boolean") { return { t: "bool", v: v }; }
  if (typeof v === "number") {
    if (v === 0 && 1 / v === -Infinity) { return { t: "num", v: "-0" }; }
    return { t: "num", v: String(v) };
  }
  if (typeof v === "string") { return { t: "str", v: v }; }
  if (Array.isArray(v)) {
    var elems = [];
    for (var i = 0; i < v.length; i++) {
      elems.push(i in v ? enc(v[i], depth + 1) : { t: "hole" });
    }
    return { t: "arr", v: elems };
  }
  var props = {};
  for (var k in v) {
    if (Object.prototype.hasOwnProperty.call(v, k)) {
      props[k] = enc(v[k], depth + 1);
    }
  }
  return { t: "obj", v: props };
}

var values = [
  0, 1, -1, 5, 0.5, -0.5, -0, NaN, Infinity, -Infinity,
  255, 1e21, 1e-7, 2147483648, 4294967295, 9007199254740991,
  "", "5", "0x10", " 12 ", "abc", "Hello", "1e3", "-0", "Infinity",
  "\t\n 5 ", true, false, null, undefined,
  [], [0, 0], [1], [[2]], ["a", "b"],
  {},
];

var binops = ["+", "-", "*", "/", "%", "<", "<=", ">", ">=",
              "==", "!=", "===", "!==", "&", "|", "^", "<<", ">>", ">>>"];

function applyBinary(op, a, b) {
  switch (op) {
    case "+": return a + b;
    case "-": return a - b;
    case "*": return a * b;
    case "/": return a / b;
    case "%": return a % b;
    case "<": return a < b;
    case "<=": return a <= b;
    case ">": return a > b;
    case ">=": return a >= b;
    case "==": return a == b;
    case "!=": return a != b;
    case "===": return a === b;
    case "!==": return a !== b;
    case "&": return a & b;
    case "|": return a | b;
    case "^": return a ^ b;
    case "<<": return a << b;
    case ">>": return a >> b;
    case ">>>": return a >>> b;
  }
  throw new Error("bad op " + op);
}

function applyUnary(op, a) {
  switch (op) {
    case "-": return -a;
    case "+": return +a;
    case "~": return ~a;
    case "!": return !a;
    case "typeof": return typeof a;
    case "String": return String(a);
    case "Number": return Number(a);
    case "Boolean": return Boolean(a);
  }
  throw new Error("bad op " + op);
}

function isRef(v) {
  return v !== null && typeof v === "object";
}

var lines = [];
var eqOps = { "==": 1, "!=": 1, "===": 1, "!==": 1 };
for (var i = 0; i < values.length; i++) {
  for (var j = 0; j < values.length; j++) {
    for (var k = 0; k < binops.length; k++) {
      var op = binops[k];
      // reference identity does not survive serialization
      if (eqOps[op] && isRef(values[i]) && isRef(values[j])) { continue; }
      lines.push(JSON.stringify({
        kind: "binary", op: op,
        a: enc(values[i]), b: enc(values[j]),
        result: enc(applyBinary(op, values[i], values[j])),
      }));
    }
  }
}

var unops = ["-", "+", "~", "!", "typeof", "String", "Number", "Boolean"];
for (var u = 0; u < values.length; u++) {
  for (var w = 0; w < unops.length; w++) {
    lines.push(JSON.stringify({
      kind: "unary", op: unops[w],
      a: enc(values[u]),
      result: enc(applyUnary(unops[w], values[u])),
    }));
  }
}

function doTask(y) {
  var j = y + 10;
  var q = 4 - y + j;
  return q;
}
lines.push(JSON.stringify({
  kind: "program", name: "doTask",
  source: "function doTask(y) { var j = y + 10; var q = 4 - y + j; return q; } " +
          "__emitResult('ok', doTask('Hello'));",
  result: enc(doTask("Hello")),
}));

console.log(lines.join("\n"));
