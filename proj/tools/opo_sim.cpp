#include <cstdio>

int main() {
  std::puts("opo-sim: not wired up yet");
  return 0;
}
