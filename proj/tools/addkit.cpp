#include "addkit/harness_cli.hpp"

int main(int argc, char** argv) { return addkit::run(argc, argv); }
