// Writes the synthetic demo sweep (dataset, scripted replies, pricing, config).
// usage: make_fixture <dir> [instances]
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "synthetic.hpp"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: make_fixture <dir> [instances]\n";
    return 2;
  }
  int n = argc > 2 ? std::atoi(argv[2]) : 10;
  std::filesystem::remove_all(std::filesystem::path(argv[1]) / "out");  // a fresh demo starts with an empty store
  std::cout << synthetic::write_sweep(argv[1], n, 4).string() << "\n";
  return 0;
}
