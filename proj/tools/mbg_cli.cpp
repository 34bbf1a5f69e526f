#include <cstdio>

int main() {
  std::puts("mbg_cli: placeholder");
  return 0;
}
