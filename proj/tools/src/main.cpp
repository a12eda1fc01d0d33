#include "scoreinv/parallel.hpp"
#include "scoreinv_cli/commands.hpp"

int main(int argc, char** argv) {
  scoreinv::tune_allocator();
  return scoreinv::cli::run(argc, argv);
}
