"""The service lottery, conditioned on a long initial queue.

Start the server with q customers and tag one uniformly at random.  At
time 0 and at every completion the server picks uniformly among the
waiting customers, while fresh arrivals keep joining.  As q grows, the
tagged customer's waiting time divided by beta q / (1 - rho) converges
to the law with tail ((1 - y)^+)^{1/(1-rho)}: unlike FCFS (where the
last in line waits essentially beta q), the lottery spreads the wait
over the whole busy period started by the initial crowd.
"""

import numpy as np

from rosqueue import QueueModel, make_exponential, simulate_conditional_wq
from rosqueue.asymptotics import conditional_w_limit

model = QueueModel(make_exponential(1.0), make_exponential(2.0), "ros")
beta, rho = 0.5, 0.5

for q in (30, 100, 1000):
    w = simulate_conditional_wq(model, q=q, replications=5_000, seed=4)
    scale = beta * q / (1 - rho)
    print(f"q = {q:5d}  (scale beta q/(1-rho) = {scale:.0f})")
    for y in (0.25, 0.5, 0.75, 1.0):
        frac = float(np.mean(w > scale * y))
        lim = float(conditional_w_limit(y, rho))
        print(f"   P(W(q) > {y:4.2f} scale): empirical {frac:.4f}   limit {lim:.4f}")
    print()

print("support ends at y = 1: the initial crowd is fully served, with high")
print("probability, by time beta q / (1 - rho), and the tagged customer")
print("cannot outlast the busy period it belongs to.")
