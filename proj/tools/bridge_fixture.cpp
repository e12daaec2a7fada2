// Writes the bridge conformance stream: a short penalty-kick session
// (reset, two steps, a rejected step, close) with each request followed by
// the engine's reply.

#include <cstdio>
#include <fstream>
#include <iostream>

#include "sportsim/bridge.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: bridge_fixture <out.bin>\n";
    return 2;
  }
  const auto bytes = sportsim::bridge::conformance_stream();
  std::ofstream f(argv[1], std::ios::binary);
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) {
    std::cerr << "cannot write " << argv[1] << "\n";
    return 1;
  }
  std::cout << bytes.size() << " bytes\n";
  return 0;
}
