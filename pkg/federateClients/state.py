from dataclasses import dataclass, field

from utils.errors import InvalidArgumentError
from generateData.dataset import Shard
from trainNetworks.model import ModelParams

@dataclass(frozen=True, eq=False)
class ClientState:
    """
    One client: its private shard and the model it holds after the last local training.
    """
    id: int
    shard: Shard = field(repr=False)
    model: ModelParams = field(repr=False)

    @property
    def sample_count(self) -> int:
        return self.shard.size

@dataclass(frozen=True, eq=False)
class RegionState:
    """
    A regional server with its clients and the current regional model.
    """
    id: int
    clients: tuple
    regional_model: ModelParams = field(repr=False)

    def __post_init__(self):
        clients = tuple(sorted(self.clients, key=lambda client: client.id))
        if len(clients) == 0:
            raise InvalidArgumentError(f"region {self.id} has no clients")
        object.__setattr__(self, "clients", clients)

    @property
    def client_ids(self) -> list:
        return [client.id for client in self.clients]

    def client(self, client_id: int) -> ClientState:
        for client in self.clients:
            if client.id == client_id:
                return client
        raise InvalidArgumentError(f"client {client_id} is not part of region {self.id}")
