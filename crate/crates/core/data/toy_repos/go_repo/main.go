package main

import (
	"fmt"

	"util"
)

func main() {
	fmt.Println(util.Join("a", "b"))
}
