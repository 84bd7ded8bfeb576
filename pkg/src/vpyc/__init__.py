"""vpyc: ahead-of-time compiler for the vPython subset.

The pipeline has four phases, connected either in-process or via the
textual `.oast` AST format:

  1. parse      vPython source -> untyped AST
  2. typeinfer  type inference, type freezing, scope/slot resolution
  3. optimizer  for-range lowering to native iterators, constant folding
  4. codegen    Olympus abstract-machine C source, or Graphviz DOT

A reference tree-walking interpreter (`vpyc.oracle`) defines ground-truth
semantics; the `vpyc` CLI drives compilation, execution, benchmarking and
binary size reports.
"""

__version__ = "0.1.0"
