// Placeholder main while the command layer is under construction.
int main() { return 0; }
