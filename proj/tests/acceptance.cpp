#include <cstdio>
int main(){std::puts("acceptance: not implemented");return 1;}
