#ifndef STRATSURV_CLI_HPP
#define STRATSURV_CLI_HPP

namespace stratsurv {

// Entry point behind the stratsurv binary; factored out so the command
// pipeline is exercisable from the test suite.
int cli_main(int argc, const char* const* argv);

}  // namespace stratsurv

#endif
