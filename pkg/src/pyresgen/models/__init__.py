# Models package: state-space, network, generator, grid and scenario dataclasses
