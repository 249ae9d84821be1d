package demo;

public class Big {
    private int a0;
    private int a1;
    private int a2;
    private int a3;
    private int a4;
    private int a5;
    private int a6;
    private int a7;
    private int a8;
    private int a9;
    private int a10;
    private int a11;
    private int a12;
    private int a13;
    private int a14;
    private int a15;
    private int a16;
    private int a17;
    private int a18;
    private int a19;
    private int a20;
    private int a21;
    private int a22;
    private int a23;
    private int a24;
    private int a25;
    private int a26;
    private int a27;
    private int a28;
    private int a29;
    private int a30;
}
