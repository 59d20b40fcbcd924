"""Train the online back-propagation network on XOR and watch it converge.

The network is the same 2-layer sigmoid machine the encode pipeline uses
as its code/skip gate, just pointed at the classic toy problem.
"""

from cafbp import create_network, forward, train

pairs = [
    ([0.0, 0.0], [0.0]),
    ([0.0, 1.0], [1.0]),
    ([1.0, 0.0], [1.0]),
    ([1.0, 1.0], [0.0]),
]

net = create_network(2, 4, 1, eta=0.5, seed=42)
net, history = train(net, pairs, max_epochs=20000, error_goal=0.01)

print(f"converged after {len(history)} epochs (epoch MSE {history[-1]:.6f})")
for epoch in (0, 9, 99, 499, len(history) - 1):
    if epoch < len(history):
        print(f"  epoch {epoch + 1:>5}: mse {history[epoch]:.6f}")

print("truth table after training:")
for x, d in pairs:
    output = float(forward(net, x).oo[0])
    print(f"  {x} -> {output:.4f}  (target {d[0]:.0f})")
