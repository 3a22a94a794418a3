#include <cstdio>
int main() { std::puts("iontrap cli placeholder"); return 0; }
