#include <cstdio>
int main(){ std::puts("motilitrack placeholder"); return 0; }
