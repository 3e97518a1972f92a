#include "couplex/app/main_entry.hpp"

int main(int argc, char** argv) {
    return couplex::app::run_main(argc, argv);
}
