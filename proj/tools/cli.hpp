#ifndef ZNN_TOOLS_CLI_HPP_
#define ZNN_TOOLS_CLI_HPP_

namespace znn {

// Entry point for the `znn` tool, separated from main() so tests can link
// it directly.  Exit codes: 0 success, 1 usage or data error, 2 discovery
// exhausted its seed budget, 3 the solver run diverged.
int cli_main(int argc, const char* const* argv);

}  // namespace znn

#endif  // ZNN_TOOLS_CLI_HPP_
