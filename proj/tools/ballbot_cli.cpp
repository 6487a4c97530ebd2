#include <cstdio>
int main() { std::puts("ballbot cli: pending"); return 0; }
