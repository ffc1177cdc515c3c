from .schemas import AssignRequest, DuoDemoRequest, SimulateRequest
