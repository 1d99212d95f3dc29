int g;
void *w(void *a) {
  pthread_create(0, 0, w, 0);
  g = g * 2;
  if (g) {
    pthread_join(0, 0);
}
