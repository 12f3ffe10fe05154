#include "cli_app.hpp"

int main(int argc, char** argv) { return qhydro::cli::run_cli(argc, argv); }
