"""hglkit: build circuits in Python, simulate them with a three-state
event-driven engine, check them with tasks and assertions, and emit VCD
waveforms and Verilog."""

from .logic import (BitPat, Logic, LogicError, logic_add, logic_and, logic_cat, logic_compare,
                    logic_divmod, logic_dyn_select, logic_eq, logic_from_text, logic_gt,
                    logic_lt, logic_mul, logic_not, logic_or, logic_reduce, logic_select,
                    logic_sub, logic_xor)
from .ir import (Circuit, EnumType, MultipleDriverError, NetlistError, SignalData, SIntType,
                 UIntType, enum_intern)
from .builder import (Array, Bundle, Cat, ClockDomain, EnumBinary, EnumGray, EnumOnehot,
                      Input, Latch, MemArrayOf, Module, Mux, Output, ParamTree, Reg, SInt,
                      Signal, Struct, UInt, Vector, Wire, Wtri, case, connect, const, default,
                      default_domain, elaborate, elsewhen, fresh_circuit, infer_ports, name,
                      otherwise, param_resolve, switch, vectorize, when)
from .sim import STRATEGIES, SimError, Simulator
from .verify import (Assertion, ClockCycles, Delay, Edge, Join, Ledger, TaskError, as_pattern,
                     evaluate, implies, seq, task)
from .session import Session, getv, setr, setv
from .vcd import VcdRecorder
from .verilog import emit_verilog, lint, lint_all

__version__ = '0.1.0'
