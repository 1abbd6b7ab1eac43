"""Tour of the similarity group and its action on the tracking state.

The filter's symmetry group combines a rotation, a positive scale and a
translation-like velocity offset.  Acting on a (position, velocity) pair it
can move any state to any other state, which is what lets one filter
formulation cover the whole state space with a single chart at the identity.

Run:  python3 demos/group_action_tour.py
"""

import numpy as np

from eqf import KinematicInput, KinematicState, Sim3, state_action
from eqf.kinematics import input_action, lift, step

rng = np.random.default_rng(7)

print("== group elements ==")
v = rng.normal(size=7) * 0.4
X = Sim3.exp(v)
print("algebra vector      ", np.array2string(v, precision=3))
print("exp then log        ", np.array2string(X.log(), precision=3))
print("round trip residual  %.3e" % np.abs(X.log() - v).max())

Y = Sim3.exp(rng.normal(size=7) * 0.4)
Z = (X * Y).inverse()
print("inverse residual     %.3e"
      % np.abs((Z * (X * Y)).matrix() - np.eye(4)).max())

print()
print("== action on states ==")
xi = KinematicState([0.0, 0.0, 50.0], [1.0, 0.0, 0.0])
moved = state_action(X, xi)
back = state_action(X.inverse(), moved)
print("state               p=%s v=%s" % (xi.p, xi.v))
print("after acting        p=%s v=%s"
      % (np.round(moved.p, 3), np.round(moved.v, 3)))
print("inverse action residual %.3e"
      % np.abs(back.as_vector() - xi.as_vector()).max())

# composition order: acting with Y then X equals acting with X*Y once
left = state_action(X, state_action(Y, xi))
right = state_action(Y * X, xi)
print("composition residual    %.3e"
      % np.abs(left.as_vector() - right.as_vector()).max())

print()
print("== the lift reproduces the dynamics ==")
# one discrete step of the kinematics equals the action of the lifted group
# element on the current state; this is the property the filter is built on
dt = 0.01
u = KinematicInput(np.zeros(3), np.array([0.0, 1.0, 0.0]))
for _ in range(3):
    xi_rand = KinematicState(rng.normal(size=3) + [0, 0, 60],
                             rng.normal(size=3))
    stepped = step(xi_rand, u, dt)
    lifted = state_action(lift(xi_rand, u, dt), xi_rand)
    print("lift residual        %.3e"
          % np.abs(stepped.as_vector() - lifted.as_vector()).max())

print()
print("== equivariance ==")
# transforming the state and the input consistently commutes with stepping
xi2 = state_action(X, xi)
u2 = input_action(X, u)
a = step(xi2, u2, dt)
b = state_action(X, step(xi, u, dt))
print("equivariance residual   %.3e"
      % np.abs(a.as_vector() - b.as_vector()).max())
