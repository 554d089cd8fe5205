"""graftool: a graph rewriting toolchain.

Typed attributed multigraphs, a textual rule language with nested
patterns and retyping, boolean rewrite sequences, Ecore/XMI import,
text emission, and a socket-driven step debugger.
"""

__version__ = "0.1.0"
