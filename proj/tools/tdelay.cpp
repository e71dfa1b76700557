#include "tdelay_app.hpp"

int main(int argc, char** argv) { return tdelay::app::run(argc, argv); }
