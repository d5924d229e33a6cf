"""Fermionic groups, Clifford superalgebras and the Bott spiral of invertible field theories.

Submodules:

* ``groups``: fermionic groups, fermionic products and twist data
* ``superalg``: superalgebras, Clifford algebras and Morita classes
* ``kfree``: graded Clifford modules, module quotients and free-fermion K-groups
* ``steenrod``: modules over A(1) and E(1)
* ``extengine``: minimal resolutions, Ext charts and low-degree bordism
* ``spiral``: closed forms and Bott spirals
* ``cli``: the ``artifact`` command
"""

__version__ = "0.1.0"
