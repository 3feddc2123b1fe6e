package com.acme;

import com.acme.util.Text;

public class App {
    public static void main(String[] args) {
        System.out.println(Text.shout("ready"));
    }
}
