namespace lab {
}
