from splitsim.link import LinkModel, LinkState, link_step
from splitsim.policy import OrchestratorPolicy, policy_decide
from splitsim.simulator import SimTrace, SimulationConfig, payload_bytes, run
from splitsim.wire import decode_message, encode_message

__all__ = [
    "LinkModel",
    "LinkState",
    "OrchestratorPolicy",
    "SimTrace",
    "SimulationConfig",
    "decode_message",
    "encode_message",
    "link_step",
    "payload_bytes",
    "policy_decide",
    "run",
]
