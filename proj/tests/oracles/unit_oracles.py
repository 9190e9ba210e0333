"""Independent reference values frozen into the unit tests."""
import math
import numpy as np


def softmin(b, beta):
    b = np.asarray(b, dtype=float)
    w = np.exp(-beta * (b - b.min()))
    w /= w.sum()
    return float((w * b).sum())


def softmax_att(b, beta):
    b = np.asarray(b, dtype=float)
    w = np.exp(beta * (b - b.max()))
    w /= w.sum()
    return float((w * b).sum())


def sig(x, lam=10.0, gamma=0.5):
    return 1.0 / (1.0 + math.exp(-lam * (x - gamma)))


def prob_sum(x, y, z):
    return 1 - (1 - x) * (1 - y) * (1 - z)


def softmax3(w):
    e = np.exp(np.asarray(w) - max(w))
    return e / e.sum()


print("softmin(0.05,0.06; 20) =", repr(softmin([0.05, 0.06], 20)))
print("softmax(0.2,0.9,0.4; 20) =", repr(softmax_att([0.2, 0.9, 0.4], 20)))
print("rgm(0.5,0.5) =", repr(math.sqrt(0.501 * 0.501) - 0.001))
print("rgm(0.2,0.8,0.5) =", repr((0.201 * 0.801 * 0.501) ** (1 / 3) - 0.001))
print("sig(0.7) =", repr(sig(0.7)))
print("softmax3(1,2,3) =", [repr(v) for v in softmax3([1.0, 2.0, 3.0])])
print("soft_valuation((0.7,0.2,0.1), 0.6) =", repr(prob_sum(0.7 * 0.6, 0.2 * 0.4, 0.1)))
print("bce [(0.9,1),(0.1,0)] =", repr(-2 * math.log(0.9)))
p = np.array([0.97, 0.02, 0.01])
print("H(0.97,0.02,0.01) =", repr(float(-(p * np.log(p + 1e-6)).sum())))
print("ln3 =", repr(math.log(3)))

# One network evaluation: n=1, m=2, logits per atom, input b.
w = [[2.0, -1.0, 0.5], [-0.5, 1.5, 0.0]]
b = [0.8, 0.3]
probs = [softmax3(t) for t in w]
soft = [prob_sum(p[0] * x, p[1] * (1 - x), p[2]) for p, x in zip(probs, b)]
c = softmin(soft, 20.0)
h = sig(c)
d = h  # one subrule: softmax attention of a single value is the value
print("network n=1 m=2 prediction =", repr(sig(d)))

# Two subrules, product mode, same inputs.
w2 = [[[2.0, -1.0, 0.5], [-0.5, 1.5, 0.0]], [[0.0, 0.0, 3.0], [1.0, -2.0, 0.0]]]
hs = []
for sub in w2:
    ps = [softmax3(t) for t in sub]
    s = [prob_sum(p[0] * x, p[1] * (1 - x), p[2]) for p, x in zip(ps, b)]
    hs.append(sig(float(np.prod(s))))
d = 1 - (1 - hs[0]) * (1 - hs[1])
print("network product n=2 prediction =", repr(sig(d)))
hs = []
for sub in w2:
    ps = [softmax3(t) for t in sub]
    s = [prob_sum(p[0] * x, p[1] * (1 - x), p[2]) for p, x in zip(ps, b)]
    hs.append(sig(softmin(s, 20.0)))
print("network attention n=2 prediction =", repr(sig(softmax_att(hs, 20.0))))

# Adam: first step from zero state moves each parameter by -lr * sign(g) (up to eps).
g = np.array([0.5, -2.0, 1e-3])
m = 0.1 * g
v = 0.001 * g * g
mh = m / (1 - 0.9)
vh = v / (1 - 0.999)
print("adam step1 =", [repr(x) for x in (-0.01 * mh / (np.sqrt(vh) + 1e-8))])
# Second step with gradient g2.
g2 = np.array([0.25, 1.0, -1e-3])
m = 0.9 * m + 0.1 * g2
v = 0.999 * v + 0.001 * g2 * g2
mh = m / (1 - 0.81)
vh = v / (1 - 0.999 ** 2)
print("adam step2 delta =", [repr(x) for x in (-0.01 * mh / (np.sqrt(vh) + 1e-8))])

# Similarity: two subrules, flattened vectors.
a = np.array([1.0, 0.0, 2.0])
bb = np.array([0.5, 1.0, -1.0])
print("similarity n=2 =", repr(float((2 / 6) * a.dot(bb) / (np.linalg.norm(a) * np.linalg.norm(bb)))))
# Connected loss at M=0.5 and M=3, range at M=0.5.
print("connected(0.5) =", repr(math.exp(-12.5 * 0.25)), "connected(3) =", 1.0)
print("range(0.5) =", 0.25, "digitization(0.25) =", repr(0.5 * (1 - math.sin(2 * math.pi * 0.25 + math.pi / 2))))
