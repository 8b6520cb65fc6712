"""fixwit: least-fixpoint certificates via games and witnesses.

Implements complete-lattice Kleene iteration with exact rational arithmetic,
the primal way-below game and the dual game with finitary strategy synthesis,
witness construction and independent verification, instantiated for
bisimilarity on transition systems, Kantorovich behavioural metrics on
labelled Markov chains, and termination probabilities of Markov chains.
"""

__version__ = "0.1.0"
