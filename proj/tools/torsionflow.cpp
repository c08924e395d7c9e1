#include "torsionflow/cli.hpp"

int main(int argc, char** argv) { return torsionflow::dispatch(argc, argv); }
