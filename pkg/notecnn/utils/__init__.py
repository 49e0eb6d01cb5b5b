from .container import read_container, write_container
from .universal_encoder import canonical_json, json_dumps
