#include <iostream>

#include "distkp/experiment.hpp"

int main(int argc, char** argv) {
  using namespace distkp;
  try {
    const ExperimentSpec spec = parse_args_and_config(argc, argv);
    return run_experiment(spec, std::cerr);
  } catch (const HelpRequested& help) {
    std::cout << help.what();
    return kExitOk;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n(run with --help for the flag list)\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
