package com.acme.util;

public final class Text {
    public static String shout(String s) {
        return s.toUpperCase();
    }
}
