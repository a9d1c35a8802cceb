"""Complex linear algebra, unitary DFT, deterministic RNG, gradient tape and optimizer."""

from testbench.numerics.dft import DftPlan, dft, idft, make_plan
from testbench.numerics.optim import AdamState, adam_step
from testbench.numerics.packing import to_complex, to_real
from testbench.numerics.seeding import interval_streams, make_rng
from testbench.numerics.tape import GradTape, Op, Var, backward, finite_diff_grad
