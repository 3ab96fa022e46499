"""polyforge: conformance test generation for JavaScript built-ins.

A concolic (dynamic symbolic) execution engine for a JavaScript subset
explores polyfill implementations of string and array built-ins, derives
concrete test inputs from the branching behavior it observes — including
symbolic objects, array-like receivers, and untyped inputs that range over
every value type — and cross-checks each generated test on several
independent implementations with majority voting.
"""

__version__ = "0.1.0"
