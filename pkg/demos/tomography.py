"""
Which preparation made this data?
=================================

Simulate trials from one column of the table, update a uniform prior,
and look at the predicted result probabilities.
"""

import numpy as np

from ptables import (
    ObservationSet,
    decompose,
    embed_new_preparation,
    example_table,
    posterior,
    predict,
    simulate_observations,
)

table = example_table("float")
dec = decompose(table)

for n in (1, 5, 20, 200):
    obs = simulate_observations(table, "S_5", [("M_1", n), ("M_2", n), ("M_3", n)], seed=1)
    rep = posterior(table, None, obs, dec)
    print(f"n={n:4d}", np.round(rep.posterior, 3))

# prediction from the table equals the prediction from the effective vector
print("M_1 predicted", predict(table, rep, 0), predict(dec, rep, 0))

# %%
# Exact mode keeps the posterior rational.
exact = example_table()
rep = posterior(exact, None, ObservationSet({(0, 0): 1}))
print([str(w) for w in rep.posterior])

# %%
# A preparation that is not in the table: estimate its vector from frequencies.
hidden = type(exact)(exact.preparations[:6], exact.interventions, exact.entries[:, :6], "exact")
emb = embed_new_preparation(decompose(hidden, "paper-example"), ObservationSet(
    {(0, 0): 3, (0, 1): 1, (1, 0): 1, (1, 1): 1, (2, 0): 1, (2, 1): 0}
))
print("new vector", [str(v) for v in emb.vector], "rank kept:", emb.rank_preserved)
