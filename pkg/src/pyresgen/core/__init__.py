# Core package: LTI algebra, synthesis, detection, grid compilation, scenarios
