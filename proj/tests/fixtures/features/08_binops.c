typedef struct node { int v; struct node *next; } node_t;
typedef unsigned int uint;
int main(void) {
  int a = 1, b = 2, *p = &a;
  uint u = (uint)-1;
  node_t *n = 0;
  struct node *m = 0;
  long sz = sizeof(int) * 4;
  a = -b + *p;
  b = a & b | a ^ b;
  a = (a << 2) >> 1;
  b = a % 3 / 2;
  if (a && b || !a) a = b - -a;
  if (a) *p = 3;
  a = (int)*p * b;
  return a == b != 0;
}
