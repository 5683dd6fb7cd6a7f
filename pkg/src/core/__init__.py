# Game computations, learners, control search and simulation
